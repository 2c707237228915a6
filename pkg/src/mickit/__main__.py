from mickit.cli import main
import sys

sys.exit(main())
