#pragma once

#include "cbalancer/error.hpp"
#include "cbalancer/resources.hpp"
#include "cbalancer/model.hpp"
#include "cbalancer/objective.hpp"
#include "cbalancer/ga.hpp"
#include "cbalancer/contention.hpp"
#include "cbalancer/registry.hpp"
#include "cbalancer/simulator.hpp"
#include "cbalancer/migration.hpp"
#include "cbalancer/bus.hpp"
#include "cbalancer/control_plane.hpp"
#include "cbalancer/scenario.hpp"
#include "cbalancer/runner.hpp"
