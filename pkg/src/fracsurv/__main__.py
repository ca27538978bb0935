import sys

from fracsurv.cli import main

sys.exit(main())
