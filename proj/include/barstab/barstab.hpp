#pragma once

#include "barstab/error.hpp"
#include "barstab/spectral_field.hpp"
#include "barstab/random_field.hpp"
#include "barstab/io.hpp"
#include "barstab/operators.hpp"
#include "barstab/stats.hpp"
#include "barstab/eigensolve.hpp"
#include "barstab/fft.hpp"
#include "barstab/functionals.hpp"
#include "barstab/evolution.hpp"
#include "barstab/hypocoercivity.hpp"
