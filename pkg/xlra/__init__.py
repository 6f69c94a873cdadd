#                               XL-RA
#
#   Random access and payload pilot scheduling for extra-large MIMO
#   cells with visibility regions.
#
#  This software is distributed in the hope that it will be useful to the
#  community, but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.

"""Grant-based random access simulator for XL-MIMO cells with visibility regions."""

__version__ = '1.0'
