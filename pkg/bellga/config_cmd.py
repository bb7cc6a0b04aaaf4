"""
Config management commands for the Bell-test laboratory

Manage run defaults in the config file.
"""

import sys
from configparser import ConfigParser, Error as ConfigParserError

from .common import CONFIG_FILE, CONFIG_SECTION, ConfigError, coerce_option


def ensure_config_exists():
    """Ensure config file exists, create if needed"""
    if not CONFIG_FILE.exists():
        CONFIG_FILE.parent.mkdir(parents=True, exist_ok=True)
        CONFIG_FILE.touch()
        CONFIG_FILE.chmod(0o600)
    return CONFIG_FILE


def load_config_parser():
    """Load config file as ConfigParser"""
    ensure_config_exists()
    parser = ConfigParser()
    try:
        parser.read(CONFIG_FILE)
    except ConfigParserError as e:
        raise ConfigError(f"Cannot parse {CONFIG_FILE}: {e}") from e
    return parser


def save_config_parser(parser):
    """Save ConfigParser to config file"""
    ensure_config_exists()
    with open(CONFIG_FILE, 'w') as f:
        parser.write(f)
    CONFIG_FILE.chmod(0o600)


def parse_key(key):
    """Parse key into section and option (e.g., 'run.seed' -> ('run', 'seed'))"""
    if '.' not in key:
        raise ConfigError("Key must be in format 'section.option' (e.g., 'run.seed')")

    section, option = key.split('.', 1)
    if section != CONFIG_SECTION:
        raise ConfigError(f"Unknown section [{section}] (only [{CONFIG_SECTION}] is supported)")
    return section, option


# Command handlers

def cmd_list(args):
    """Handle 'bellga config list' command"""
    parser = load_config_parser()

    if not parser.sections():
        print("Config file is empty. Use 'bellga config set' to add values.")
        return

    print(f"\nConfiguration ({CONFIG_FILE}):\n")

    for section in parser.sections():
        print(f"[{section}]")
        for option in parser.options(section):
            value = parser.get(section, option)
            print(f"  {option} = {value}")
        print()


def cmd_get(args):
    """Handle 'bellga config get' command"""
    parser = load_config_parser()
    section, option = parse_key(args.key)

    if not parser.has_option(section, option):
        raise ConfigError(f"Option '{option}' not found in section [{section}]")

    print(parser.get(section, option))


def cmd_set(args):
    """Handle 'bellga config set' command"""
    section, option = parse_key(args.key)
    value = coerce_option(option, args.value)

    parser = load_config_parser()
    if not parser.has_section(section):
        parser.add_section(section)

    parser.set(section, option, str(value))
    save_config_parser(parser)

    print(f"Set {section}.{option} = {value}")


def cmd_unset(args):
    """Handle 'bellga config unset' command"""
    parser = load_config_parser()
    section, option = parse_key(args.key)

    if not parser.has_option(section, option):
        raise ConfigError(f"Option '{option}' not found in section [{section}]")

    parser.remove_option(section, option)

    # Remove section if empty
    if not parser.options(section):
        parser.remove_section(section)

    save_config_parser(parser)
    print(f"Unset {section}.{option}")


def cmd_path(args):
    """Handle 'bellga config path' command"""
    print(CONFIG_FILE)


# Setup and routing

def setup_parser(subparsers):
    """Setup argparse subcommands for config"""

    # bellga config list
    list_parser = subparsers.add_parser(
        'list',
        help='List all configuration values',
        description='Display all configuration values from the config file.'
    )
    list_parser.set_defaults(func=cmd_list)

    # bellga config get
    get_parser = subparsers.add_parser(
        'get',
        help='Get a configuration value',
        description='Get a specific configuration value.',
        epilog="""
Examples:
  bellga config get run.seed
  bellga config get run.samples
"""
    )
    get_parser.add_argument('key', help='Config key in format section.option (e.g., run.seed)')
    get_parser.set_defaults(func=cmd_get)

    # bellga config set
    set_parser = subparsers.add_parser(
        'set',
        help='Set a configuration value',
        description='Set a run default in the config file. '
                    'Options: model, convention, samples, seed, workers, format.',
        epilog="""
Examples:
  bellga config set run.model bivector
  bellga config set run.samples 1000000
  bellga config set run.workers 4
"""
    )
    set_parser.add_argument('key', help='Config key in format section.option (e.g., run.seed)')
    set_parser.add_argument('value', help='Value to set')
    set_parser.set_defaults(func=cmd_set)

    # bellga config unset
    unset_parser = subparsers.add_parser(
        'unset',
        help='Remove a configuration value',
        description='Remove a configuration value from the config file.',
        epilog="""
Examples:
  bellga config unset run.seed
"""
    )
    unset_parser.add_argument('key', help='Config key in format section.option (e.g., run.seed)')
    unset_parser.set_defaults(func=cmd_unset)

    # bellga config path
    path_parser = subparsers.add_parser(
        'path',
        help='Show configuration file path',
        description='Display the path to the configuration file.'
    )
    path_parser.set_defaults(func=cmd_path)


def handle_command(args):
    """Route to appropriate config subcommand"""
    if hasattr(args, 'func'):
        args.func(args)
    else:
        print("Error: No config subcommand specified", file=sys.stderr)
        sys.exit(2)
