import sys

from protcascade.cli import main

sys.exit(main())
