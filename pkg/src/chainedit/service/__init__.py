"""FastAPI services: the pipeline service and the subject protocol service."""

from .app import create_service_app, install_error_handlers
from .subject_app import SubjectSessionManager, create_subject_app

__all__ = [
    "SubjectSessionManager",
    "create_service_app",
    "create_subject_app",
    "install_error_handlers",
]
