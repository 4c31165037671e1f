#include <stdio.h>
#include "crnp.h"

int main(void) {
    const char *text = "species X1 X2 X3\n"
                       "X2 + X1 <-> 2 X1 [k=1,1]\n"
                       "X3 + X1 <-> 2 X1 [k=1,1]\n";
    CrnpNetwork *net = NULL;
    CrnpCertificate *cert = NULL;

    if (crnp_network_parse(text, &net) != CRNP_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", crnp_last_error());
        return 1;
    }
    if (crnp_certify(net, 0, &cert) != CRNP_STATUS_OK) {
        fprintf(stderr, "certify: %s\n", crnp_last_error());
        crnp_network_free(net);
        return 1;
    }
    printf("crnp %s: %s\n", crnp_version(),
           crnp_certificate_verdict(cert) == CRNP_VERDICT_PERSISTENT ? "persistent" : "undecided");

    crnp_certificate_free(cert);
    crnp_network_free(net);
    return 0;
}
