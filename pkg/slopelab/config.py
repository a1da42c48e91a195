import os

base_dir = os.path.abspath(os.path.dirname(__file__))


class BaseConfig:
    """
    Base application configuration
    """
    DEBUG = False
    TESTING = False
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')

    RESOURCES_DIR = os.path.join(base_dir, 'resources')
    CATALOG_FILE = os.path.join(RESOURCES_DIR, 'catalog.json')
    INSTANCES_DIR = os.path.join(RESOURCES_DIR, 'instances')

    SEED = int(os.getenv('SLOPELAB_SEED', 0))
    THREADS = int(os.getenv('SLOPELAB_THREADS', 1))

    TOLERANCE = {
        'triangle': 1e-12,
        'finite': 1e-9,
        'min-norm': 1e-9,
        'support': 1e-9,
        'sharp-slope': 1e-6,
        'ekeland': 1e-12,
        'tie': 1e-12,
    }

    SLOPE = {
        'cap': 1e12,
        'eps-per-h': 4,         # discrete slope radius in units of grid spacing
    }

    SAMPLING = {
        'pair-limit': 2000,     # points per ball below which all pairs are checked
        'random-pairs': 200,    # partners drawn per point above the limit
        'boundary-points': 8,
        'points-per-radius': 10,
        'directions': 16,
    }

    MIN_NORM = {
        'exact-vertex-limit': 8,
        'exact-dim-limit': 4,
        'wolfe-max-iter': 1000,
    }

    ORBIT = {
        'max-iter-factor': 10,
    }

    DETERMINATION = {
        'dilations': (0.5, 0.1, 0.01),
        'tolerance-factor': 10,
        'grid-points': 8,       # grid points per one-sided radius
        'bisection-steps': 60,
        'refinement-floor': 1e-12,
    }

    REPRESENTATION = {
        'grid-points': 40,      # grid points per search radius
    }


class DevelopmentConfig(BaseConfig):
    """
    Development application configuration
    """
    DEBUG = True
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'DEBUG')


class TestingConfig(BaseConfig):
    """
    Test suite configuration: coarser sampling keeps property runs short
    """
    TESTING = True
    LOG_LEVEL = 'WARNING'

    SAMPLING = {
        **BaseConfig.SAMPLING,
        'points-per-radius': 6,
        'directions': 8,
    }

    REPRESENTATION = {
        'grid-points': 30,
    }


class ProductionConfig(BaseConfig):
    """
    Production application configuration
    """
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'WARNING')
