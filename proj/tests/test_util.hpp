#pragma once

#include <cstdlib>
#include <string>

#include "pfsim/sellmeier.hpp"

// dispersion data lives next to the sources; tests get the directory from the
// build system
inline std::string data_dir() {
    const char* env = std::getenv("PFSIM_DATA_DIR");
    return env ? env : "data";
}

inline pfsim::SellmeierCoefficients test_material() {
    static pfsim::SellmeierCoefficients mat =
        pfsim::load_sellmeier_file(data_dir() + "/liio3.sellmeier");
    return mat;
}
