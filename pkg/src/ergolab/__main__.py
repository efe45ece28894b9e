import sys

from ergolab.cli import main

sys.exit(main())
