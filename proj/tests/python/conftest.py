import os
import sys

# Under ctest the module comes from the build tree; an editable install would
# otherwise take precedence through its import hook.
_build = os.environ.get("TWF_PYTHON_BUILD_DIR")
if _build:
    sys.meta_path[:] = [f for f in sys.meta_path if "ScikitBuild" not in type(f).__name__]
    sys.path.insert(0, _build)
