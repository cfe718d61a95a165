import sys

from sbcn.cli import main

sys.exit(main())
