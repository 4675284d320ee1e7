#pragma once

#include "fpnc/signal.hpp"
#include "fpnc/codec.hpp"
#include "fpnc/ofdm.hpp"
#include "fpnc/channel.hpp"
#include "fpnc/relay.hpp"
#include "fpnc/endnode.hpp"
#include "fpnc/experiments.hpp"
#include "fpnc/config.hpp"
