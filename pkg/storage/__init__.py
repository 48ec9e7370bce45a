"""Local storage of result images and debug dumps."""
