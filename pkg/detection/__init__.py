"""Illumination, superpixel and motion detection stages."""
