import os

from dotenv import load_dotenv, find_dotenv
from flask import Flask

# Initialize application
app = Flask(__name__, static_folder=None, template_folder=None)

# Load Environment variables for further processing in app.config
load_dotenv(find_dotenv(usecwd=True))

# app configuration
app_settings = os.getenv(
    'APP_SETTINGS',
    'slopelab.config.DevelopmentConfig'
)
app.config.from_object(app_settings)

# Package modules log through children of the application logger
app.logger.setLevel(app.config['LOG_LEVEL'])

# Register command groups
from slopelab.api.views import api
from slopelab.api.catalog.views import api_catalog
from slopelab.api.slope.views import api_slope
from slopelab.api.ekeland.views import api_ekeland
from slopelab.api.plr.views import api_plr
from slopelab.api.orbit.views import api_orbit
from slopelab.api.determination.views import api_determination

app.register_blueprint(api)
app.register_blueprint(api_catalog)
app.register_blueprint(api_slope)
app.register_blueprint(api_ekeland)
app.register_blueprint(api_plr)
app.register_blueprint(api_orbit)
app.register_blueprint(api_determination)
