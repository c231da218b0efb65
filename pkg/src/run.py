import signal
import sys

from tornado import options

from config_from_environs import apply_environment
from filmlab import cli


def sigint_handler(sig, frame):
    print('interrupted', file=sys.stderr)
    sys.exit(130)


signal.signal(signal.SIGINT, sigint_handler)

if __name__ == "__main__":
    apply_environment(options.options)
    sys.exit(cli.main(sys.argv))
