#pragma once

#include "admit/bounds.hpp"
#include "admit/generators.hpp"
#include "admit/hjb.hpp"
#include "admit/instance_io.hpp"
#include "admit/lp.hpp"
#include "admit/model.hpp"
#include "admit/overbook.hpp"
#include "admit/policies.hpp"
#include "admit/report.hpp"
#include "admit/sim.hpp"
