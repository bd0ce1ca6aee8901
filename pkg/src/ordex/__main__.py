from ordex.cli import main
import sys

sys.exit(main())
