import sys

from dualunitary.cli import main

sys.exit(main())
