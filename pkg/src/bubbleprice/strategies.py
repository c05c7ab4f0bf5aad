from bubbleprice._strategies import exponents, grids, mc_configs, models, payoffs, rebates

__all__ = ["exponents", "grids", "mc_configs", "models", "payoffs", "rebates"]
