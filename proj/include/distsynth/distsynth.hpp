#pragma once

#include <distsynth/bernoulli.hpp>
#include <distsynth/distributions.hpp>
#include <distsynth/fixtures.hpp>
#include <distsynth/format.hpp>
#include <distsynth/quadrature.hpp>
#include <distsynth/rational.hpp>
#include <distsynth/rng.hpp>
#include <distsynth/selection.hpp>
#include <distsynth/subadditive.hpp>
#include <distsynth/verify.hpp>
