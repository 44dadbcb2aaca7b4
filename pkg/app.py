"""Main entry point for the scene graph retrieval explorer."""
import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent
sys.path.append(str(project_root))

from config.logging_config import setup_logging
from ssg_toolkit.ui.streamlit_app import SceneGraphExplorerUI

# Set up logging
logger = setup_logging()


def main():
    """Main entry point for the application."""
    try:
        app = SceneGraphExplorerUI()
        app.run()
    except Exception as e:
        logger.error(f"Application failed to start: {e}")
        raise


if __name__ == "__main__":
    main()
