# The tolerable source noise and the comparison with the earlier key rate.
#
# Run:  python demos/03_noise_limit_and_figure.py
# The same data is available from the command line:
#   cvqkd limit
#   cvqkd figure3 --epsilon0 0.2 --out fig3.csv
import numpy as np

from cvqkd import ChannelParams, SourceParams, k_reverse_asymptotic, limiting_epsilon0
from cvqkd.cli import figure3_rows

lim = limiting_epsilon0()
print(f"closed form {lim.closed_form:.12f}, bisection {lim.bisection:.12f}")

# Near T = 1 the reverse rate changes sign at the limit
for eps0 in (0.3, lim.closed_form, 0.5):
    k = k_reverse_asymptotic(SourceParams(0.0, eps0), ChannelParams(1 - 1e-6))
    print(f"eps0 = {eps0:.4f}: K_R(T -> 1) = {k:+.5f}")

curves = {eps0: np.array(figure3_rows(eps0, 99)) for eps0 in (0.0, 0.1, 0.2, 0.35)}
for eps0, rows in curves.items():
    print(f"eps0 = {eps0:4.2f}: max gap to prior rate = {np.max(rows[:, 2] - rows[:, 1]):.4f} bits")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots()
    for eps0, rows in curves.items():
        (line,) = ax.plot(rows[:, 0], rows[:, 1], label=f"bound, eps0={eps0}")
        ax.plot(rows[:, 0], rows[:, 2], "--", color=line.get_color())
    ax.set_xlabel("T")
    ax.set_ylabel("bits per pulse")
    ax.set_ylim(-0.5, 3)
    ax.legend()
    fig.savefig("figure3.png", dpi=120)
    print("wrote figure3.png")
