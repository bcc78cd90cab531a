#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace pcr {

struct MetricsRow {
    std::size_t epoch = 0;
    std::uint64_t seed = 0;
    std::string method;
    std::string metric;
    double value = 0.0;

    bool operator==(const MetricsRow&) const = default;
};

using MetricsRows = std::vector<MetricsRow>;

}  // namespace pcr
