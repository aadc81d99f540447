#include <stdio.h>
#include <stdlib.h>

#include "seqpredict.h"

int main(void) {
    uint64_t labels[2000];
    for (size_t k = 0; k < 2000; k++) {
        labels[k] = (k / 5) % 3;
    }

    SpSequence *seq = NULL;
    if (sp_sequence_new(labels, 2000, &seq) != SP_STATUS_OK) {
        fprintf(stderr, "error: %s\n", sp_last_error_message());
        return 1;
    }

    SpEntropyReport report;
    sp_corrected_report(seq, SP_CONVENTION_SPLIT, &report);
    printf("h1=%.6f h2=%.6f mi=%.6f mi_corrected=%.6f\n", report.h1, report.h2, report.mi, report.mi_corrected);

    SpBootstrapOptions opts = sp_bootstrap_options_default(42);
    opts.replicates = 200;
    SpBootstrap *res = NULL;
    if (sp_bootstrap(seq, &opts, &res) != SP_STATUS_OK) {
        fprintf(stderr, "error: %s\n", sp_last_error_message());
        sp_sequence_free(seq);
        return 1;
    }
    SpBootstrapSummary s;
    sp_bootstrap_summary(res, &s);
    printf("mi_true=%.6f p975=%.6f gap=%.6f reject=%d\n", s.mi_true, s.p975, s.gap, s.reject_null);

    sp_bootstrap_free(res);
    sp_sequence_free(seq);
    return 0;
}
