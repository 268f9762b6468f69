// umbrella header
#pragma once

#include "perfbound/bounds.hpp"
#include "perfbound/complexity.hpp"
#include "perfbound/core.hpp"
#include "perfbound/io.hpp"
#include "perfbound/logistic.hpp"
#include "perfbound/numeric.hpp"
#include "perfbound/rerm.hpp"
#include "perfbound/robust.hpp"
#include "perfbound/sweep.hpp"
#include "perfbound/synthetic.hpp"
#include "perfbound/transition.hpp"
#include "perfbound/transport.hpp"
