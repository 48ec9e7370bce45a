"""Background candidate clustering, final decision and the median baseline."""
