import sys

from dwellsim.cli import main

sys.exit(main())
