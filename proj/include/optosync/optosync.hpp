#pragma once

// Umbrella header.

#include "optosync/config.hpp"
#include "optosync/dynamics.hpp"
#include "optosync/error.hpp"
#include "optosync/io.hpp"
#include "optosync/measures.hpp"
#include "optosync/model.hpp"
#include "optosync/sweep.hpp"
#include "optosync/version.hpp"
