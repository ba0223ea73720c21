#include <stdio.h>
#include "elliptic_lab.h"

int main(void) {
    const char *spec = "{\"n\": 40, \"pair\": {\"kind\": \"gaussian_real\", \"rho\": 0.5}, \"seed\": 3}";
    ElMatrix *m = NULL;
    if (el_matrix_generate(spec, 0, &m) != EL_STATUS_OK) {
        char msg[256];
        el_last_error_message(msg, sizeof msg);
        fprintf(stderr, "generate: %s\n", msg);
        return 1;
    }
    double re[40], im[40], inside = 0.0;
    if (el_eigenvalues(m, 1.0 / 6.324555320336759, re, im, 40) != EL_STATUS_OK) return 1;
    if (el_inside_fraction(re, im, 40, 0.5, 1.2, &inside) != EL_STATUS_OK) return 1;
    el_matrix_free(m);
    printf("elliptic-lab %s inside %.3f\n", el_version(), inside);
    return inside > 0.8 ? 0 : 1;
}
