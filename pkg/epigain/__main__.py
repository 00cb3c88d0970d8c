import sys

from epigain.cli.main import main

sys.exit(main())
