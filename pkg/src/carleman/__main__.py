import sys

from carleman.cli import main

sys.exit(main())
