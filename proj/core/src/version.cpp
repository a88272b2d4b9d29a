#include "stemnorm/version.hpp"

#include <Eigen/Core>
#include <fftw3.h>
#include <json.hpp>

namespace stemnorm {

std::string library_version() { return STEMNORM_VERSION; }

std::string versions_json() {
    nlohmann::json root;
    root["stemnorm"] = STEMNORM_VERSION;
    root["fftw"] = std::string(fftw_version);
    root["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION);
    root["compiler"] = __VERSION__;
    return root.dump(2);
}

}  // namespace stemnorm
