from latmon.cli.commands import certify, dimbound, fuzz, latsum

COMMANDS = (latsum, certify, dimbound, fuzz)
