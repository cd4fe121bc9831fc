// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the vorafilter Project.

#include <iostream>

#include <vorafilter/cli.hpp>

int main( int argc, char **argv )
{
    return vora::cli::run( argc, argv, std::cout, std::cerr );
}
