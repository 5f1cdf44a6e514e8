import sys

from bridgeopt.main import main

sys.exit(main())
