"""Independent reference values, frozen from 40-digit mpmath evaluations.

Regenerate with ``python tests/oracles.py``; the module-level constants are
what the tests compare against.
"""

PSI_E_HALF = 0.04828679513998632735
HOEFFDING_N100_A05 = 0.27162030314812389970
BERNSTEIN_N100_A05_S05 = 0.32080536253630971707
MPEB_01_A05 = 23.40987200307971094331
PRPL_N1_HALF = 7.76405326934776322454
GAMMA1_PRPL_BERN05_A05 = 2.71620303148123899698
GAMMA1_MPEB_BERN05_A05 = 2.96041437460159675271
WOR_TARGET_RHO05 = 1.95932632178277622797
BS_HALF_N_EQ_M_100 = 0.04918505938818581737
SECOND_ORDER_TARGET_A05 = 20.44945762847811419059
FIG1_HOEFFDING = 0.03461636765204570676
A_1000_001 = 0.004503116949773363114
GAUSS_LB_S2_N1000_A001 = 0.18980235930616590971
GAUSS_ORACLE_S2_N1000_A001 = 0.32581949852079056046
GAUSS_RATIO_FACTOR2 = 3.43325024738199874354
KL_BERN_05_075 = 0.14384103622589046372


def _regenerate():
    import mpmath as mp

    mp.mp.dps = 40
    a05 = mp.mpf("0.05")
    L2, L4 = mp.log(2 / a05), mp.log(4 / a05)
    half = mp.mpf("0.5")
    a = mp.mpf("0.01")
    a1000 = ((1 - a) * mp.log(1 - a) + (2 * a - 1) * mp.log(a)) / 1000
    z = mp.sqrt(2) * mp.erfinv(1 - a)
    vals = {
        "PSI_E_HALF": (-mp.log(1 - half) - half) / 4,
        "HOEFFDING_N100_A05": 2 * mp.sqrt(L2 / 200),
        "BERNSTEIN_N100_A05_S05": mp.sqrt(2 * L2 / 100) + 4 * L2 / 300,
        "MPEB_01_A05": 2 * mp.sqrt(half) * mp.sqrt(L4) + 14 * L4 / 3,
        "PRPL_N1_HALF": (L2 + (-mp.log(half) - half)) / half,
        "GAMMA1_PRPL_BERN05_A05": mp.sqrt(2 * L2),
        "GAMMA1_MPEB_BERN05_A05": mp.sqrt(2 * L4),
        "WOR_TARGET_RHO05": mp.sqrt(2 * L2) * half / mp.log(2),
        "BS_HALF_N_EQ_M_100": mp.mpf(4) / 3 * L2 / 100,
        "SECOND_ORDER_TARGET_A05": 14 * L4 / 3,
        "FIG1_HOEFFDING": 2 * mp.sqrt(mp.log(400) / (2 * 10 ** 4)),
        "A_1000_001": a1000,
        "GAUSS_LB_S2_N1000_A001": 2 * mp.sqrt(2 * a1000),
        "GAUSS_ORACLE_S2_N1000_A001": 4 * z / mp.sqrt(1000),
        "GAUSS_RATIO_FACTOR2": 2 * (4 * z / mp.sqrt(1000)) / (2 * mp.sqrt(2 * a1000)),
        "KL_BERN_05_075": half * mp.log(half / mp.mpf("0.75")) + half * mp.log(half / mp.mpf("0.25")),
    }
    for k, v in vals.items():
        print(f"{k} = {mp.nstr(v, 21)}")


if __name__ == "__main__":
    _regenerate()
