import sys

from scalarprod.cli import main

sys.exit(main())
