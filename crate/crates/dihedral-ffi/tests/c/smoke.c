#include <math.h>
#include <stdio.h>
#include "dihedral.h"

int main(void) {
    DhDistribution *nu = NULL;
    DhModel *m = NULL;
    double p = 0.0, s[1] = {0.0};
    int64_t r[1] = {0};
    char msg[128];

    if (dh_distribution_nu1(&nu) != DH_STATUS_OK) return 1;
    /* P(S_2 = e) = 1/16 + 2/64 + 1/4 for nu1 */
    if (dh_rw_nstep_prob(nu, 2, 1, r, 1, &p) != DH_STATUS_OK) return 2;
    if (fabs(p - 0.34375) > 1e-12) return 3;
    if (dh_model_fixture("gm-markov", &m) != DH_STATUS_OK) return 4;
    if (dh_gm_sigma1_sq(m, s, 1) != DH_STATUS_OK || fabs(s[0] - 1.5) > 1e-8) return 5;
    if (dh_model_fixture("nope", &m) != DH_STATUS_INVALID_ARGUMENT) return 6;
    dh_last_error(msg, sizeof msg);
    printf("%s %s\n", dh_version(), msg);
    dh_model_free(m);
    dh_distribution_free(nu);
    return 0;
}
