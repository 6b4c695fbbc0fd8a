# Core package for shared functionality