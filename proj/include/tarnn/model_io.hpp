#pragma once

#include <string>

#include "tarnn/gated.hpp"
#include "tarnn/reservoir.hpp"

namespace tarnn {

// Versioned structured-text model files: a header with family, variant and
// dimensions, followed by row-major weight blocks printed with 17
// significant digits (exact double round-trip).

void save_model(const ReservoirModel& m, const std::string& path);
void save_model(const GatedModel& m, const std::string& path);

enum class ModelFamily { Reservoir, Gated };
ModelFamily peek_model_family(const std::string& path);

ReservoirModel load_reservoir(const std::string& path);
GatedModel load_gated(const std::string& path);

}  // namespace tarnn
