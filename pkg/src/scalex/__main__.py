import sys

from scalex.cli import main

sys.exit(main())
