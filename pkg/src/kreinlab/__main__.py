import sys

from kreinlab.cli import main

sys.exit(main())
