"""python -m lgpac: the command line without Flask"""
import sys

from lgpac.common.cli_commands import cli_run

sys.exit(cli_run(sys.argv[1:]))
