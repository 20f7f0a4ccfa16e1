#pragma once

// Extreme-value analysis of node-degree sequences: heavy-tail detection,
// tail and extremal index estimation, first-hitting-time models, and
// random-walk samplers on graphs.

#include "evdeg/error.hpp"
#include "evdeg/extremal.hpp"
#include "evdeg/generators.hpp"
#include "evdeg/graph.hpp"
#include "evdeg/hitting.hpp"
#include "evdeg/io.hpp"
#include "evdeg/parallel.hpp"
#include "evdeg/rng.hpp"
#include "evdeg/samplers.hpp"
#include "evdeg/tail.hpp"
#include "evdeg/version.hpp"
