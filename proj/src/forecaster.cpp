#include "thermocast/forecaster.hpp"

#include "thermocast/windowing.hpp"

namespace thermocast {

std::vector<double> Forecaster::predict_windows(
    const WindowedDataset& ds, std::span<const std::int64_t> windows) const {
    const auto H = static_cast<std::size_t>(horizon());
    std::vector<double> out(windows.size() * H);
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto y =
            predict(ds.input_window(windows[i]), ds.ancillary_window(windows[i]));
        std::copy(y.begin(), y.end(), out.begin() + i * H);
    }
    return out;
}

}  // namespace thermocast
