"""Regenerates special_functions.json with mpmath at 50 digits."""
import json

import mpmath as mp

mp.mp.dps = 50
xs = [i / 4 for i in range(-32, 33)]
erfc = [[x, float(mp.erfc(x))] for x in xs]
q = [[x, float(mp.erfc(x / mp.sqrt(2)) / 2)] for x in xs]
gq = []
for a in [0.25, 0.5, 1, 1.5, 2, 3, 5, 8, 10.5, 32, 50, 128, 500, 4096]:
    for f in [0.01, 0.1, 0.5, 0.9, 1.0, 1.1, 1.5, 2, 4]:
        x = a * f
        gq.append([a, x, float(mp.gammainc(a, x, mp.inf, regularized=True))])
    for x in [0.001, 0.3, 7.0, 30.0]:
        gq.append([a, x, float(mp.gammainc(a, x, mp.inf, regularized=True))])
lg = [[x, float(mp.loggamma(x))] for x in [0.1, 0.5, 1, 1.5, 2, 3.7, 10, 33.3, 100, 1000.5, 1e5]]
out = {
    "generator": "mpmath %s, 50 digits" % mp.__version__,
    "erfc": erfc,
    "q_function": q,
    "gamma_q": gq,
    "ln_gamma": lg,
}
with open("special_functions.json", "w") as f:
    json.dump(out, f, indent=1)
