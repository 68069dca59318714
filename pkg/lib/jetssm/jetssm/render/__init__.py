from jetssm.render.plots import depth_vs_standoff, loss_curves, profile_overlay, write_figure, write_frame

__all__ = ["depth_vs_standoff", "loss_curves", "profile_overlay", "write_figure", "write_frame"]
