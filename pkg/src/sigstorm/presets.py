"""Normal-traffic parameter sets of the published figures (alphas zero)."""

from sigstorm.model import ModelParams

FIG2 = ModelParams(lambda_L=1 / 600, lambda_H=1 / 1800, mu_L=1 / 5, mu_H=1 / 120,
                   tau_L=1 / 5, tau_H=1 / 5, tau_P=1 / 300)
FIG3 = ModelParams(lambda_L=1 / 300, lambda_H=1 / 600, mu_L=1 / 5, mu_H=1 / 180,
                   tau_L=1 / 5, tau_H=1 / 5, tau_P=1 / 300)
FIG4 = ModelParams(lambda_L=1 / 600, lambda_H=1 / 1800, mu_L=1 / 5, mu_H=1 / 120,
                   tau_L=1 / 5, tau_H=1 / 2, tau_P=1 / 600)
FIG5 = ModelParams(lambda_L=1 / 600, lambda_H=1 / 600, mu_L=1 / 5, mu_H=1 / 180,
                   tau_L=1 / 5, tau_H=1 / 5, tau_P=1 / 600)

PRESETS = {"fig2": FIG2, "fig3": FIG3, "fig4": FIG4, "fig5": FIG5}

FIG5_USERS = 10_000
FIG5_MAX_FRACTION = 0.2
