#pragma once

#include "ftform/types.hpp"
#include "ftform/kinematics.hpp"
#include "ftform/formation_graph.hpp"
#include "ftform/control_laws.hpp"
#include "ftform/basin.hpp"
#include "ftform/leader_profile.hpp"
#include "ftform/integrators.hpp"
#include "ftform/simulator.hpp"
#include "ftform/analysis.hpp"
#include "ftform/scenario.hpp"
#include "ftform/export.hpp"
