# Configuration and logging for rcom
