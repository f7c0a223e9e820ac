APP_NAME = 'pvmw-dp'
VERSION = '0.3.0'
AUTHOR = 'pvmw-dp developers'
__version__ = VERSION
