#include <math.h>
#include <stdio.h>
#include "smoothball.h"

int main(void) {
    SbModel *model = NULL;
    if (sb_model_new("continuous", 2.0, NAN, NAN, &model) != SB_STATUS_OK) {
        fprintf(stderr, "model: %s\n", sb_last_error());
        return 1;
    }
    double r0 = 0.0;
    sb_model_covariance(model, 0.0, &r0);
    if (fabs(r0 - sqrt(M_PI)) > 1e-9) {
        return 2;
    }
    SbSampler *sampler = NULL;
    if (sb_sampler_new(model, 1.0, 65, -1, &sampler) != SB_STATUS_OK) {
        return 3;
    }
    double path[65];
    if (sb_sampler_path(sampler, 7, 0, path, 65) != SB_STATUS_OK) {
        return 4;
    }
    double p = 0.0;
    sb_exact_l2(1.0, 0, 1.0, &p);
    if (fabs(p - 0.6826894921370859) > 1e-9) {
        return 5;
    }
    if (sb_model_new("nonsense", 1.0, NAN, NAN, &model) != SB_STATUS_INVALID_ARGUMENT) {
        return 6;
    }
    sb_sampler_free(sampler);
    sb_model_free(model);
    printf("%s ok\n", sb_version());
    return 0;
}
