#pragma once

#include "kgmp/asymptotics.hpp"
#include "kgmp/elliptic.hpp"
#include "kgmp/energy.hpp"
#include "kgmp/errors.hpp"
#include "kgmp/gauge.hpp"
#include "kgmp/model.hpp"
#include "kgmp/mountainpass.hpp"
