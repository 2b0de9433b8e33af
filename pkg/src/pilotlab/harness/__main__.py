import sys

from pilotlab.harness.cli import main

sys.exit(main())
