"""Scene graph prediction network on a small numpy autodiff engine."""
