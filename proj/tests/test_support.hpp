#pragma once

#include <memory>
#include <string>

#include "railscale/characterization.hpp"
#include "railscale/config.hpp"
#include "railscale/timing_power.hpp"

namespace railscale::fixtures {

inline std::string data_dir()
{
    return RAILSCALE_TEST_DATA_DIR;
}

inline std::shared_ptr<const ResourceCurves> default_curves()
{
    static const auto curves = load_default_curves(data_dir());
    return curves;
}

inline AppProfile profile(const std::string& name)
{
    return load_named_profile(name, data_dir());
}

// tabla: alpha = 0.2, beta = 0.4, BRAM ~25% of nominal power.
inline AppProfile default_profile()
{
    return profile("tabla");
}

} // namespace railscale::fixtures
