# Configuration: environment settings and the .cfg run-configuration parser
