from flask.cli import FlaskGroup

from slopelab import app

cli = FlaskGroup(create_app=lambda: app, add_default_commands=False)

if __name__ == '__main__':
    cli()
