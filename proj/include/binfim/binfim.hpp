#pragma once

#include <binfim/attribute_space.hpp>
#include <binfim/binning.hpp>
#include <binfim/binning_scheme.hpp>
#include <binfim/fisher.hpp>
#include <binfim/model.hpp>
#include <binfim/montecarlo.hpp>
#include <binfim/quadrature.hpp>
#include <binfim/reconstruction.hpp>
