"""
Utility functions for the Hardy inequality laboratory
"""

import logging
from typing import Any, Dict

import psutil

from config import settings


def setup_logging(level: str = None) -> None:
    """Setup logging configuration."""
    level = level or settings.LOG_LEVEL
    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )


def host_info() -> Dict[str, Any]:
    """Cores and memory of the machine, for report provenance."""
    try:
        memory = psutil.virtual_memory()
        return {
            "cores": psutil.cpu_count(logical=True) or 1,
            "physical_cores": psutil.cpu_count(logical=False) or 1,
            "memory_total_gb": round(memory.total / (1024**3), 2),
            "memory_available_gb": round(memory.available / (1024**3), 2),
        }
    except Exception as e:
        logging.error(f"Error checking system resources: {e}")
        return {}


def default_worker_count() -> int:
    """Worker threads for batch runs: HARDYLAB_WORKERS, else one per core."""
    if settings.MAX_WORKERS > 0:
        return settings.MAX_WORKERS
    return max(1, psutil.cpu_count(logical=True) or 1)


def format_error_message(error: str) -> str:
    """Format error messages with helpful suggestions."""
    lowered = error.lower()
    if "non-integrable" in lowered:
        error += "\n\n💡 Integrability:\n"
        error += "• The profile does not vanish fast enough where the weight blows up\n"
        error += "• Move the singular radius (R, or r = 1 for |log r|) off the support\n"
        error += "• Or use a profile that vanishes to higher order there\n"
    elif "inadmissible" in lowered:
        error += "\n\n💡 Parameters:\n"
        error += "• Every listed condition must hold for the family\n"
        error += "• Run `validate` on the config to see all failed conditions at once\n"
        error += "• Critical cases (Q = p(1 - a), alpha p = Q) use the *Critical families\n"
    elif "unresolved" in lowered or "undefined" in lowered:
        error += "\n\n💡 Config references:\n"
        error += "• Names must match a [setting], [profile] or [instance] block exactly\n"
        error += "• Blocks may appear in any order; names are case-sensitive\n"
    elif "compactly supported" in lowered:
        error += "\n\n💡 Test functions:\n"
        error += "• Inequalities are checked for profiles supported in [lo, hi] with 0 < lo, hi < inf\n"
        error += "• Wrap a profile in (restrict lo hi P) or multiply it by (window lo hi)\n"
    elif "not claimed sharp" in lowered:
        error += "\n\n💡 Sharpness:\n"
        error += "• Probes run only where the constant is claimed sharp; see `constants <family>`\n"
    return error
