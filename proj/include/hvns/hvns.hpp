// Umbrella header: the simulator, diagnostics, tangent analysis and studies.
#pragma once

#include "hvns/box.hpp"
#include "hvns/diagnostics.hpp"
#include "hvns/dynamics.hpp"
#include "hvns/errors.hpp"
#include "hvns/fft.hpp"
#include "hvns/field.hpp"
#include "hvns/harness.hpp"
#include "hvns/modes.hpp"
#include "hvns/nonlinear.hpp"
#include "hvns/operators.hpp"
#include "hvns/params.hpp"
#include "hvns/pool.hpp"
#include "hvns/quadrature.hpp"
#include "hvns/record.hpp"
#include "hvns/tangent.hpp"
