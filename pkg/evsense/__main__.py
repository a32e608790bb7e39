import sys

from evsense.cli.main import main

sys.exit(main())
