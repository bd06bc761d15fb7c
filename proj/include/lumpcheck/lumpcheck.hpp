#pragma once

#include "lumpcheck/abstraction.hpp"
#include "lumpcheck/engine.hpp"
#include "lumpcheck/errors.hpp"
#include "lumpcheck/interval.hpp"
#include "lumpcheck/io.hpp"
#include "lumpcheck/model.hpp"
#include "lumpcheck/pctl.hpp"
