"""Circle patterns approximating conformal maps."""
