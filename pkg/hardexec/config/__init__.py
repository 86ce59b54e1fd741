"""JSON configuration files: the typed option registry and its parsers"""

from .configparser import ConfigParser
from .envelope_config import EnvelopeConfigParser, load_envelope_config
from .cluster_config import ClusterConfigParser, load_cluster_config
