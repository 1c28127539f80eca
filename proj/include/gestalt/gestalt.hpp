#pragma once

#include "gestalt/affinity.hpp"
#include "gestalt/errors.hpp"
#include "gestalt/fp_kernel.hpp"
#include "gestalt/gabor.hpp"
#include "gestalt/image.hpp"
#include "gestalt/io_util.hpp"
#include "gestalt/kernel_cache.hpp"
#include "gestalt/mean_field.hpp"
#include "gestalt/render.hpp"
#include "gestalt/rng.hpp"
#include "gestalt/se2.hpp"
#include "gestalt/spectral.hpp"
#include "gestalt/stimulus.hpp"
