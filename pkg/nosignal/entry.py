import sys

from resources.lib.cli import dispatch

sys.exit(dispatch())
