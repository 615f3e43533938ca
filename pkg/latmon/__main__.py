import sys

from latmon.main import main

sys.exit(main())
