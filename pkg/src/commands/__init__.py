"""One module per command-line command."""
from .attribute import cmd_attribute
from .bench import cmd_bench
from .compare import cmd_compare
from .synth import cmd_synth
from .validate import cmd_validate

__all__ = ["cmd_attribute", "cmd_bench", "cmd_compare", "cmd_synth", "cmd_validate"]
