#pragma once

#include "viscowave/common.hpp"
#include "viscowave/dispersion.hpp"
#include "viscowave/duality.hpp"
#include "viscowave/io.hpp"
#include "viscowave/kernels.hpp"
#include "viscowave/laplace_inversion.hpp"
#include "viscowave/numerics.hpp"
#include "viscowave/wavefield.hpp"
