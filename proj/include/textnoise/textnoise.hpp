#pragma once

// Umbrella header: the full corpus-driven text-noising toolkit.

#include "textnoise/unicode.hpp"   // IWYU pragma: export
#include "textnoise/rng.hpp"       // IWYU pragma: export
#include "textnoise/m2.hpp"        // IWYU pragma: export
#include "textnoise/aspects.hpp"   // IWYU pragma: export
#include "textnoise/generate.hpp"  // IWYU pragma: export
#include "textnoise/profile.hpp"   // IWYU pragma: export
#include "textnoise/noiser.hpp"    // IWYU pragma: export
#include "textnoise/metrics.hpp"   // IWYU pragma: export
