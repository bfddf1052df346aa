import sys

from bmcsweep.cli import main

sys.exit(main())
