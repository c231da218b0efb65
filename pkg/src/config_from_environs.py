import environs


def environment_overrides(env=None):
    """FILMLAB_* variables that seed the global option defaults; command-line flags still win."""
    env = env or environs.Env()
    with env.prefixed('FILMLAB_'):
        overrides = {
            'logging_config': env('LOGGING_CONFIG', None),
            'out': env('OUT', None),
            'prometheus_port': env.int('PROMETHEUS_PORT', None),
            'workers': env.int('WORKERS', None),
            'seed': env.int('SEED', None),
        }
    return {name: value for name, value in overrides.items() if value is not None}


def apply_environment(options, env=None):
    for name, value in environment_overrides(env).items():
        setattr(options, name, value)
