#include <math.h>
#include <stdio.h>
#include <string.h>

#include "epfcast.h"

#define CHECK(call)                                                   \
    do {                                                              \
        EpfStatus s_ = (call);                                        \
        if (s_ != EPF_STATUS_OK) {                                    \
            fprintf(stderr, "%s: %d %s\n", #call, s_, epf_last_error()); \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    double x[24 * 30], smooth[24 * 30];
    for (int i = 0; i < 24 * 30; i++) x[i] = 50.0 + 10.0 * sin(i / 12.0);

    EpfNormalizer norm;
    CHECK(epf_vst_fit(x, 24 * 30, &norm));
    double y[24 * 30];
    CHECK(epf_vst_transform(norm, x, 24 * 30, y));
    CHECK(epf_vst_inverse(norm, y, 24 * 30, y));
    for (int i = 0; i < 24 * 30; i++)
        if (fabs(y[i] - x[i]) > 1e-9) return 2;

    CHECK(epf_ltsc_smooth(EPF_SMOOTHER_MOVING_AVERAGE, 1, x, 24 * 30, smooth));

    EpfBattery battery = epf_battery_default();
    EpfTrade cb, model;
    CHECK(epf_crystal_ball_day(battery, x, &cb));
    CHECK(epf_trade_day(battery, x, x + 24, &model));
    if (model.profit > cb.profit) return 3;

    EpfConfig *cfg = NULL;
    CHECK(epf_config_new(&cfg));
    if (epf_config_set(cfg, "bogus", "1") != EPF_STATUS_INVALID_ARGUMENT) return 4;
    if (strlen(epf_last_error()) == 0) return 5;
    epf_config_free(cfg);

    printf("epfcast %s ok %zu\n", epf_version(), epf_hours_per_day());
    return 0;
}
