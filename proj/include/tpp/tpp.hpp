#pragma once

#include "tpp/cavity.hpp"
#include "tpp/csv.hpp"
#include "tpp/discriminators.hpp"
#include "tpp/errors.hpp"
#include "tpp/filters.hpp"
#include "tpp/io.hpp"
#include "tpp/metrics.hpp"
#include "tpp/model.hpp"
#include "tpp/moments.hpp"
#include "tpp/parallel.hpp"
#include "tpp/record.hpp"
#include "tpp/rng.hpp"
#include "tpp/simulate.hpp"
#include "tpp/train.hpp"

namespace tpp {
inline constexpr const char* kVersion = "0.1.0";
}
