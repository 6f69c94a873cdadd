#                               XL-RA
#
#   Random access and payload pilot scheduling for extra-large MIMO
#   cells with visibility regions.
#
#  This software is distributed in the hope that it will be useful to the
#  community, but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.

from setuptools import setup

setup(name='xlra',
      version='1.0',
      description='Random access protocols and payload pilot scheduling for XL-MIMO cells with visibility regions',
      packages=['xlra'],
      python_requires='>=3.7',
      install_requires=[
      'pytest-cov',
      'hypothesis',
      'numpy',
      'scipy>=1.7',
      'pandas',
      'tqdm',
      ],
      entry_points={'console_scripts': ['xlra = xlra.cli:main']},
      zip_safe=False)
